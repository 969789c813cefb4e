"""The reserved default value."""


class _Phi:
    """Out-of-band "no message" value; distinct from every l-bit string."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "PHI"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Phi, ())

    def __lt__(self, other):
        return not isinstance(other, _Phi)


PHI = _Phi()


def is_phi(value):
    return value is PHI

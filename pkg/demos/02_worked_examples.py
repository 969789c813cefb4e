"""The 31-processor examples: a split network under the consistency attack,
and a unanimous network under the validity attack."""

from coolba.engine import run_ba
from coolba.scenarios import consistency_example, validity_example
from coolba.simnet.attacks import ConsistencyAttack
from coolba.values import PHI

spacer = "-" * 60


class Watch(ConsistencyAttack):
    """Same attack, but prints the honest success bits as the run goes."""

    def act(self, ctx):
        if ctx.round in (2, 3, 4):
            zeros = sorted(i for i, p in ctx.honest.items() if p.s == 0)
            print(f"  after round {ctx.round}: s=0 at {zeros}")
        return super().act(ctx)


setup = consistency_example()
print("A1 = 1..11 hold M1, A2 = 12..21 hold M2, F = 22..31")
print("M1", setup.expected.hex())
print("M2", setup.groups["M2"].hex())
print("M2 encodes exactly like M1 at labels 1 and 12")
rec = run_ba(setup.inputs, Watch(), setup.params, faulty=setup.faulty)
outputs = set(rec.outputs.values())
print("outputs:", "all M1" if outputs == {setup.expected} else outputs)
print("rounds:", rec.rounds_total, " bits:", {k: v for k, v in rec.bits.items() if v})

print(spacer)

setup = validity_example()
rec = run_ba(setup.inputs, setup.adversary, setup.params, faulty=setup.faulty)
print("everyone honest holds M1; F forges a common message and votes 0")
print("outputs:", "all M1" if set(rec.outputs.values()) == {setup.expected} else "unexpected")
print("any PHI?", any(v is PHI for v in rec.outputs.values()))

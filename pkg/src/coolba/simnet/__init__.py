"""Round simulator (``network``) and adversary strategies (``attacks``)."""

from .network import (AdversaryContext, Inbox, Kind, ProtocolMessage, Slot, Transcript,
                      run_rounds)

__all__ = ["AdversaryContext", "Inbox", "Kind", "ProtocolMessage", "Slot", "Transcript",
           "run_rounds"]

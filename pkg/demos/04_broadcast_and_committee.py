"""Broadcast from a leader, and agreement through a small committee."""

from coolba.engine import run_ba_committee, run_bb
from coolba.params import derive
from coolba.simnet.attacks import RandomAdversary, SplitLeader

params = derive(13, 4, 64)
value = bytes.fromhex("00112233445566ff")

rec = run_bb(1, value, RandomAdversary(), params, faulty={10, 11, 12, 13})
print("honest leader:", set(rec.outputs.values()) == {value}, "leader bits", rec.bits["leader_bits"])

rec = run_bb(13, None, SplitLeader(RandomAdversary()), params, faulty={10, 11, 12, 13})
print("two-faced leader: outputs agree?", rec.flags["consistent"], set(rec.outputs.values()))

params = derive(100, 2, 64)
rec = run_ba_committee({i: value for i in range(1, 101) if i not in (3, 60)}, RandomAdversary(),
                       params, faulty={3, 60}, committee_seed=5)
print("committee", rec.committee)
print("all 98 honest output the value?", set(rec.outputs.values()) == {value})
print("dissemination bits", rec.bits["dissemination_bits"], "of", rec.total_bits)

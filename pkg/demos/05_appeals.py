# coding: utf-8

# # Settling an appeal
#
# Witnesses agree on a result, which becomes a fishing record with a SHA-1
# abstract. A provider returns something else; the judge checks the record
# is genuine and the answer really is off before moving the deposit.

import numpy as np

from entrapnet import Appeal, Task, TaskKind, Tolerances, adjudicate, witness_validate

y = np.array([0.3, -1.2, 2.5, 0.0])
task = Task(1, TaskKind.FISHING, b"matmul-v1", "officer-0", 0)
record = witness_validate(task, [y, y * (1 + 1e-9), y], Tolerances(), b"net-proof", b"salt")
print("abstract:", record.abstract.hex())

tol = Tolerances(delta_ver=0.1)
for label, y_f in [("honest", y), ("slightly off", 1.05 * y), ("wrong", 2 * y)]:
    appeal = Appeal.against(record, y_f, officer="officer-0", provider="provider-9",
                            provider_deposit=100.0, officer_deposit=1.0)
    print(f"{label:>13}: {adjudicate(appeal, tol).to_json()}")

# A record with a swapped key no longer matches its abstract.
forged = Appeal(2 * y, record.fields[:3] + (b"forged",), record.abstract, "officer-0",
                "provider-9", 100.0)
print("       forged:", adjudicate(forged, tol).to_json())

"""Send halves of maximally entangled pairs through the butterfly and check fidelity.

Without an attack every receiver ends up sharing a maximally entangled pair
with the matching sender, up to numerical noise.
"""
from __future__ import annotations

from qnetcode import catalog, protocol

for name, args in [("butterfly", (3,)), ("nsource", (2, 3)), ("twoedge", (7,))]:
    net, protected = getattr(catalog, name)(*args)
    o = protocol.run(net, protected)
    print(f"{name}{args}: q={net.ctx.q} fidelities={[round(f, 12) for f in o.fidelities]} "
          f"correct={protocol.verify_correctness(o)}")

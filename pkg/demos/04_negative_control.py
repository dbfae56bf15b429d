"""Drop the shared randomness and watch a copy attack on e9 learn the messages."""
from __future__ import annotations

from qnetcode import catalog, protocol
from qnetcode.attacks import build_copy_attack

net, protected = catalog.butterfly(3)
att = build_copy_attack(net.ctx, 1).at((9,))
for randomness in (True, False):
    o = protocol.run(net, protected, att, randomness=randomness)
    print(f"randomness={randomness}: secure={protocol.verify_security(o)} "
          f"I(A;E)={o.mutual_info:.4f} bits")

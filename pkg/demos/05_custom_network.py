"""Export a builtin network to JSON, reload it, and analyse the result.

The same file can be handed to the command line tool with --network.
Coefficients are stored already reduced into the field, so a file written
for one q is a different code over another q.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

from qnetcode import catalog, codec
from qnetcode.netmodel import dump_network, load_network

with tempfile.TemporaryDirectory() as tmp:
    for q in (7, 11):
        net, protected = catalog.twoedge(q)
        path = Path(tmp) / f"twoedge_{q}.json"
        path.write_text(dump_network(net))
        loaded, _ = load_network(path)
        v = codec.analyze(loaded, (13, 14), protected)
        print(f"q={q}: attacking e13,e14 secure={v.secure} recoverable={v.recoverable}")
# Over F_7 the coefficient block for {e13, e14} has determinant 7 = 0, so
# Eve sees a message combination; over F_11 it is invertible.

"""Binary-free text format for channel/slot fixtures.

Layout: one block per matrix. A block starts with a header line

    # block <name> <d0> <d1> ... <dn>

followed by the matrix in row-major order, one row per line, entries as
"re,im" pairs separated by single spaces. Real blocks (positions) use plain
floats. Tensors are flattened to (prod(leading dims), last dim) rows.
"""

import numpy as np

from .topology import ChannelRealization

_FMT = "%.17g"


def _write_block(fh, name, arr):
    arr = np.asarray(arr)
    fh.write(f"# block {name} {' '.join(str(d) for d in arr.shape)}\n")
    flat = arr.reshape(-1, arr.shape[-1]) if arr.ndim > 1 else arr.reshape(1, -1)
    if np.iscomplexobj(arr):
        for row in flat:
            fh.write(" ".join(f"{_FMT % z.real},{_FMT % z.imag}" for z in row) + "\n")
    else:
        for row in flat:
            fh.write(" ".join(_FMT % v for v in row) + "\n")


def write_blocks(path, blocks):
    """Write an ordered dict of name -> array to a fixture file."""
    with open(path, "w") as fh:
        fh.write("# fdcfsim text dump v1\n")
        for name, arr in blocks.items():
            _write_block(fh, name, arr)


def read_blocks(path):
    """Parse a fixture file back into name -> array."""
    blocks = {}
    name, shape, rows = None, None, []

    def flush():
        if name is None:
            return
        arr = np.array(rows)
        blocks[name] = arr.reshape(shape)

    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# block "):
                flush()
                parts = line.split()
                name = parts[2]
                shape = tuple(int(p) for p in parts[3:])
                rows = []
            elif line.startswith("#"):
                continue
            else:
                if "," in line:
                    rows.append(
                        [complex(*map(float, tok.split(","))) for tok in line.split()]
                    )
                else:
                    rows.append([float(tok) for tok in line.split()])
    flush()
    return blocks


def dump_channels(path, chan):
    write_blocks(
        path,
        {
            "ap_pos": chan.ap_pos,
            "ue_pos": chan.ue_pos,
            "H": chan.h,
            "F": chan.f,
            "S": chan.s,
        },
    )


def load_channels(path):
    blocks = read_blocks(path)
    h = blocks["H"].astype(np.complex128)
    f = blocks["F"].astype(np.complex128)
    return ChannelRealization(
        h,
        f,
        blocks["S"].astype(np.complex128),
        blocks["ap_pos"].astype(float),
        blocks["ue_pos"].astype(float),
        k_dl=f.shape[0],
    )

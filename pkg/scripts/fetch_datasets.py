#!/usr/bin/env python3
"""Fetch the public benchmark graphs into data/.

The dolphin social network is downloaded from the public mirrors
below, converted from GML to a plain edge list, and validated
structurally (node count, undirected edge count, diameter).  The two
optional datasets (guppy, householder93) have no stable public home;
supply them manually as data/guppy.edges and data/householder93.edges
in the same two-column format and this script will validate them.

No checksums are pinned because the upstream archive carries none;
the script prints the sha256 of whatever it downloaded so a known-good
digest can be recorded once obtained.
"""
from __future__ import annotations

import hashlib
import io
import re
import sys
import urllib.request
import zipfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from walktimes import diameter, read_graph, strip_leaves  # noqa: E402

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

DOLPHINS_URLS = (
    "https://websites.umich.edu/~mejn/netdata/dolphins.zip",
    "http://www-personal.umich.edu/~mejn/netdata/dolphins.zip",
)

# (nodes, undirected edges, diameter) before and after leaf stripping
EXPECTED = {
    "dolphins.edges": ((62, 159, 8), (53, 150, 7)),
    "guppy.edges": ((99, 726, 6), (98, 725, 5)),
    "householder93.edges": ((104, 211, 7), (73, 180, 5)),
}


def gml_edge_pairs(text: str) -> list[tuple[str, str]]:
    """Pull source/target pairs out of a GML edge list."""
    pairs = []
    for block in re.findall(r"edge\s*\[(.*?)\]", text, flags=re.DOTALL):
        src = re.search(r"source\s+(\S+)", block)
        dst = re.search(r"target\s+(\S+)", block)
        if src is None or dst is None:
            raise ValueError("edge block without source/target")
        pairs.append((src.group(1), dst.group(1)))
    if not pairs:
        raise ValueError("no edge blocks found in GML input")
    return pairs


def download(urls) -> bytes:
    last = None
    for url in urls:
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=30) as resp:
                return resp.read()
        except Exception as exc:  # noqa: BLE001 - report and try the mirror
            print(f"  failed: {exc}")
            last = exc
    raise SystemExit(f"all mirrors failed (last error: {last})")


def fetch_dolphins() -> Path:
    raw = download(DOLPHINS_URLS)
    print(f"sha256 {hashlib.sha256(raw).hexdigest()}")
    with zipfile.ZipFile(io.BytesIO(raw)) as zf:
        name = next(n for n in zf.namelist() if n.endswith(".gml"))
        text = zf.read(name).decode("utf-8", errors="replace")
    pairs = gml_edge_pairs(text)
    DATA_DIR.mkdir(exist_ok=True)
    out = DATA_DIR / "dolphins.edges"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        for a, b in pairs:
            fh.write(f"{a} {b}\n")
    print(f"wrote {out} ({len(pairs)} edges)")
    return out


def validate(path: Path) -> bool:
    before, after = EXPECTED[path.name]
    g = read_graph(str(path), undirected=True)
    got = (g.n, g.undirected_edge_count(), diameter(g))
    if got != before:
        print(f"{path.name}: got {got}, expected {before}")
        return False
    h = strip_leaves(g).graph
    got = (h.n, h.undirected_edge_count(), diameter(h))
    if got != after:
        print(f"{path.name} after strip: got {got}, expected {after}")
        return False
    print(f"{path.name}: {before} -> {after} verified")
    return True


def main() -> int:
    target = DATA_DIR / "dolphins.edges"
    if target.exists():
        print(f"{target} already present")
    else:
        fetch_dolphins()
    ok = validate(target)

    for name in ("guppy.edges", "householder93.edges"):
        path = DATA_DIR / name
        if path.exists():
            ok = validate(path) and ok
        else:
            print(f"{name}: optional, not present; place it under data/ "
                  "as a two-column edge list to include it")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

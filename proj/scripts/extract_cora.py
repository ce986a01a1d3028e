#!/usr/bin/env python3
"""Extract the CORA citation graph bundled in the `pgl` wheel into 0-based text files.

Usage: pip download --no-deps pgl -d /tmp/pgl && python3 scripts/extract_cora.py /tmp/pgl/pgl-*.whl data/

Writes cora.edges (one "u v" pair per line, node ids are paper ids ranked ascending)
and cora.labels ("node_id,label" with labels ranked by class name).
"""
import sys
import zipfile
from pathlib import Path


def main(wheel: str, out_dir: str) -> None:
    z = zipfile.ZipFile(wheel)
    cites = z.read("pgl/data/cora/cora.cites").decode().split()
    content = z.read("pgl/data/cora/cora.content").decode().splitlines()

    papers = {}
    for line in content:
        fields = line.split()
        papers[int(fields[0])] = fields[-1]
    ids = sorted(papers)
    index = {pid: i for i, pid in enumerate(ids)}
    classes = sorted(set(papers.values()))
    class_index = {c: i for i, c in enumerate(classes)}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "cora.edges", "w") as f:
        f.write("# CORA citation graph (undirected view); ids = ranked paper ids\n")
        it = iter(cites)
        for a, b in zip(it, it):
            f.write(f"{index[int(a)]} {index[int(b)]}\n")
    with open(out / "cora.labels", "w") as f:
        f.write("node_id,label\n")
        for pid in ids:
            f.write(f"{index[pid]},{class_index[papers[pid]]}\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])

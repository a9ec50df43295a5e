#!/usr/bin/env python3
"""Assemble the benchmark datasets bundled under data/.

Sources (all redistributions of the UCI originals):
  wine           scikit-learn's bundled wine_data.csv          (178 x 13, 3 classes)
  breast_cancer  R MASS::biopsy via the pydataset sdist        (699 x 9, 2 classes)
  mfeat          UCI Multiple Features via the mvlearn wheel   (2000 x 649, 10 classes)

Usage:
  pip download --no-deps mvlearn pydataset -d /tmp/dl
  python3 scripts/prepare_data.py /tmp/dl data/

Missing values in breast_cancer (16 cells of the bare-nuclei column) are
imputed with the column median because the loader rejects non-finite cells.
"""
import csv
import glob
import io
import json
import os
import statistics
import struct
import sys
import tarfile
import zipfile


def wine(out):
    import sklearn.datasets

    src = os.path.join(os.path.dirname(sklearn.datasets.__file__), "data", "wine_data.csv")
    with open(src) as f:
        rows = list(csv.reader(f))[1:]
    header = [f"f{j}" for j in range(13)] + ["label"]
    with open(os.path.join(out, "wine.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def breast_cancer(dl, out):
    sdist = glob.glob(os.path.join(dl, "pydataset-*.tar.gz"))[0]
    outer = tarfile.open(sdist)
    name = [n for n in outer.getnames() if n.endswith("resources.tar.gz")][0]
    inner = tarfile.open(fileobj=io.BytesIO(outer.extractfile(name).read()))
    text = inner.extractfile("resources/rdata/csv/MASS/biopsy.csv").read().decode()
    rows = list(csv.reader(io.StringIO(text)))
    body = rows[1:]
    # columns: rowname, ID, V1..V9, class
    feats = [[c for c in r[2:11]] for r in body]
    labels = [r[11] for r in body]
    for j in range(9):
        present = [float(r[j]) for r in feats if r[j] not in ("NA", "")]
        med = statistics.median(present)
        for r in feats:
            if r[j] in ("NA", ""):
                r[j] = repr(med)
    with open(os.path.join(out, "breast_cancer.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"V{j + 1}" for j in range(9)] + ["label"])
        for r, l in zip(feats, labels):
            w.writerow(r + [l])


def mfeat(dl, out):
    wheel = glob.glob(os.path.join(dl, "mvlearn-*.whl"))[0]
    z = zipfile.ZipFile(wheel)
    views = ["fou", "fac", "kar", "pix", "zer", "mor"]
    blocks, labels = [], None
    for v in views:
        text = z.read(f"mvlearn/datasets/UCImultifeature/mfeat-{v}.csv").decode()
        rows = list(csv.reader(io.StringIO(text)))[1:]
        blocks.append([[float(x) for x in r[:-1]] for r in rows])
        lab = [int(float(r[-1])) for r in rows]
        assert labels is None or labels == lab
        labels = lab
    n = len(labels)
    cols = sum(len(b[0]) for b in blocks)
    with open(os.path.join(out, "mfeat.f32"), "wb") as f:
        for i in range(n):
            row = [x for b in blocks for x in b[i]]
            f.write(struct.pack(f"<{cols}f", *row))
    with open(os.path.join(out, "mfeat_labels.txt"), "w") as f:
        f.write("\n".join(str(l) for l in labels) + "\n")
    with open(os.path.join(out, "mfeat.json"), "w") as f:
        json.dump({"rows": n, "cols": cols, "labels": "mfeat_labels.txt"}, f)
        f.write("\n")


if __name__ == "__main__":
    dl, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    wine(out)
    breast_cancer(dl, out)
    mfeat(dl, out)

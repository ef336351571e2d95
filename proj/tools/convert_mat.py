#!/usr/bin/env python3
"""Convert a MATLAB hyperspectral scene to the raw layout hsiband reads.

    convert_mat.py Indian_pines.mat Indian_pines_gt.mat out/indian_pines

writes out/indian_pines.img (BSQ little-endian int16), out/indian_pines.img.hdr
and out/indian_pines_gt.csv. The variable inside each .mat file is picked
automatically when there is only one array; use --cube-key / --gt-key otherwise.
"""

import argparse
import pathlib
import sys

import numpy as np
from scipy.io import loadmat


def only_array(mat, key, path):
    if key:
        return mat[key]
    arrays = [k for k, v in mat.items() if not k.startswith("__") and isinstance(v, np.ndarray)]
    if len(arrays) != 1:
        sys.exit(f"{path}: expected one array, found {arrays}; pass the key explicitly")
    return mat[arrays[0]]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("cube_mat")
    ap.add_argument("gt_mat")
    ap.add_argument("prefix", help="output path prefix")
    ap.add_argument("--cube-key")
    ap.add_argument("--gt-key")
    args = ap.parse_args()

    cube = only_array(loadmat(args.cube_mat), args.cube_key, args.cube_mat)
    gt = only_array(loadmat(args.gt_mat), args.gt_key, args.gt_mat)
    if cube.ndim != 3 or gt.shape != cube.shape[:2]:
        sys.exit(f"shape mismatch: cube {cube.shape}, ground truth {gt.shape}")
    if cube.min() < -32768 or cube.max() > 32767:
        sys.exit("cube values do not fit in int16")

    rows, cols, bands = cube.shape
    prefix = pathlib.Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    img = prefix.with_name(prefix.name + ".img")
    np.ascontiguousarray(cube.transpose(2, 0, 1)).astype("<i2").tofile(img)
    img.with_name(img.name + ".hdr").write_text(
        f"samples = {cols}\nlines = {rows}\nbands = {bands}\n"
        "interleave = bsq\ndata type = 2\nbyte order = 0\n"
    )
    np.savetxt(prefix.with_name(prefix.name + "_gt.csv"), gt.astype(int), fmt="%d", delimiter=",")
    print(f"{img}: {rows}x{cols}x{bands}, {int((gt > 0).sum())} labeled pixels")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Offline reference values for the eval fixture, computed with pycocotools.

    python3 tests/reference/coco_reference.py tests/data/eval_gt.json \
        tests/data/eval_dets.json > tests/data/eval_expected.json

Layouts become images 1..N in corpus order, classes become categories 1..C.
No fixture area sits exactly on 32^2 or 96^2, where pycocotools' closed
ranges and the library's half-open ones would disagree.
"""
import contextlib
import io
import json
import sys

from pycocotools.coco import COCO
from pycocotools.cocoeval import COCOeval

NAMES = ["AP", "AP50", "AP75", "APs", "APm", "APl", "AR1", "AR10", "AR100", "ARs", "ARm", "ARl"]


def to_coco(gt_path, det_path):
    gt = json.load(open(gt_path))
    dt = json.load(open(det_path))
    classes = gt["classes"]
    image_ids = {l["id"]: i + 1 for i, l in enumerate(gt["layouts"])}
    cats = [{"id": k + 1, "name": n} for k, n in enumerate(classes)]
    images = [{"id": image_ids[l["id"]], "width": l["width"], "height": l["height"]} for l in gt["layouts"]]
    anns, results = [], []
    for l in gt["layouts"]:
        for c in l["components"]:
            x1, y1, x2, y2 = c["bbox"]
            anns.append({"id": len(anns) + 1, "image_id": image_ids[l["id"]],
                         "category_id": classes.index(c["class"]) + 1,
                         "bbox": [x1, y1, x2 - x1, y2 - y1], "area": (x2 - x1) * (y2 - y1), "iscrowd": 0})
    for l in dt["layouts"]:
        for c in l["components"]:
            x1, y1, x2, y2 = c["bbox"]
            results.append({"image_id": image_ids[l["id"]], "category_id": classes.index(c["class"]) + 1,
                            "bbox": [x1, y1, x2 - x1, y2 - y1], "score": c.get("score", 1.0)})
    return classes, {"images": images, "annotations": anns, "categories": cats}, results


def stats(gt, results, cat_ids=None):
    with contextlib.redirect_stdout(io.StringIO()):
        coco_gt = COCO()
        coco_gt.dataset = gt
        coco_gt.createIndex()
        coco_dt = coco_gt.loadRes(results) if results else COCO()
        ev = COCOeval(coco_gt, coco_dt, "bbox")
        if cat_ids is not None:
            ev.params.catIds = cat_ids
        ev.evaluate()
        ev.accumulate()
        ev.summarize()
    return {n: float(v) for n, v in zip(NAMES, ev.stats)}


def main():
    classes, gt, results = to_coco(sys.argv[1], sys.argv[2])
    out = {"overall": stats(gt, results), "per_class": {}}
    for k, name in enumerate(classes):
        out["per_class"][name] = stats(gt, results, [k + 1])
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()

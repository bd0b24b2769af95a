#!/usr/bin/env python3
"""Regenerates the bundled mini-corpus under data/.

data/corpus/      20 synthetic aerial-style scenes (aerial_XX.png) with
                  ground truth in annotations.json, plus 5 public-domain /
                  CC0 photographs shipped with scikit-image (photo_*.png).
data/multispectral/
                  one synthetic 5-band scene (field01_{B,G,R,RE,NIR}.png).

The output is deterministic for a given numpy/Pillow/scikit-image version.
"""

import json
import pathlib

import numpy as np
from PIL import Image

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "data" / "corpus"
MULTI = ROOT / "data" / "multispectral"

SIZES = [(640, 480), (800, 600), (512, 512), (720, 540)]

VEHICLE_COLORS = [
    (235, 235, 235),  # white
    (200, 30, 30),  # red
    (30, 60, 190),  # blue
    (25, 25, 25),  # black
    (160, 165, 170),  # silver
    (230, 200, 40),  # yellow
]
PERSON_COLORS = [(240, 90, 60), (250, 240, 220), (60, 160, 220), (30, 30, 30)]


def value_noise(rng, h, w, cell):
    gh, gw = h // cell + 2, w // cell + 2
    grid = rng.random((gh, gw)).astype(np.float32)
    img = Image.fromarray((grid * 255).astype(np.uint8)).resize(
        (gw * cell, gh * cell), Image.BICUBIC
    )
    return np.asarray(img, dtype=np.float32)[:h, :w] / 255.0


def ground(rng, h, w):
    base = np.zeros((h, w), np.float32)
    for cell, amp in [(96, 0.5), (32, 0.25), (8, 0.15), (3, 0.10)]:
        base += amp * value_noise(rng, h, w, cell)
    land = value_noise(rng, h, w, 160)
    grass = np.array([70, 110, 50], np.float32)
    soil = np.array([140, 115, 80], np.float32)
    paved = np.array([115, 115, 112], np.float32)
    t = land[..., None]
    rgb = grass * (1 - t) + soil * t
    rgb = np.where((land > 0.62)[..., None], paved, rgb)
    rgb = rgb * (0.65 + 0.7 * base[..., None])

    # a couple of straight roads
    for _ in range(rng.integers(1, 3)):
        if rng.random() < 0.5:
            y0 = int(rng.integers(40, h - 60))
            rgb[y0 : y0 + 28, :] = 95 + 20 * base[y0 : y0 + 28, :, None]
            rgb[y0 + 13 : y0 + 15, :: 16] = 210
        else:
            x0 = int(rng.integers(40, w - 60))
            rgb[:, x0 : x0 + 28] = 95 + 20 * base[:, x0 : x0 + 28, None]
            rgb[:: 16, x0 + 13 : x0 + 15] = 210
    return rgb


def place(rng, taken, h, w, bw, bh):
    for _ in range(200):
        x = int(rng.integers(4, w - bw - 4))
        y = int(rng.integers(4, h - bh - 4))
        ok = all(
            x + bw + 3 < tx or tx + tw + 3 < x or y + bh + 3 < ty or ty + th + 3 < y
            for tx, ty, tw, th in taken
        )
        if ok:
            taken.append((x, y, bw, bh))
            return x, y
    return None


def aerial(idx, rng):
    w, h = SIZES[idx % len(SIZES)]
    rgb = ground(rng, h, w)
    boxes = []
    taken = []
    for _ in range(int(rng.integers(6, 14))):
        long_side = int(rng.integers(20, 36))
        short_side = int(rng.integers(10, 18))
        bw, bh = (long_side, short_side) if rng.random() < 0.5 else (short_side, long_side)
        pos = place(rng, taken, h, w, bw, bh)
        if pos is None:
            continue
        x, y = pos
        color = np.array(VEHICLE_COLORS[int(rng.integers(len(VEHICLE_COLORS)))], np.float32)
        # shadow, body, roof highlight
        rgb[y + 2 : y + bh + 2, x + 2 : x + bw + 2] *= 0.55
        rgb[y : y + bh, x : x + bw] = color
        rgb[y + bh // 4 : y + 3 * bh // 4, x + bw // 4 : x + 3 * bw // 4] = color * 0.85 + 20
        boxes.append((x, y, bw, bh, 1))
    for _ in range(int(rng.integers(3, 9))):
        s = int(rng.integers(5, 9))
        pos = place(rng, taken, h, w, s, s)
        if pos is None:
            continue
        x, y = pos
        color = np.array(PERSON_COLORS[int(rng.integers(len(PERSON_COLORS)))], np.float32)
        rgb[y : y + s, x : x + s] = color
        boxes.append((x, y, s, s, 2))
    rgb += rng.normal(0.0, 4.0, rgb.shape)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8), boxes


def photos():
    import skimage.data as d

    # All five ship with scikit-image and are public domain or CC0.
    return {
        "photo_astronaut": d.astronaut(),
        "photo_rocket": d.rocket(),
        "photo_hubble": d.hubble_deep_field(),
        "photo_coffee": d.coffee(),
        "photo_chelsea": d.chelsea(),
    }


def multispectral(rng):
    h, w = 256, 256
    veg = value_noise(rng, h, w, 48)
    tex = value_noise(rng, h, w, 4)
    reflect = {
        "B": (0.10, 0.06),
        "G": (0.14, 0.12),
        "R": (0.18, 0.05),
        "RE": (0.22, 0.30),
        "NIR": (0.28, 0.55),
    }
    out = {}
    for band, (soil_r, veg_r) in reflect.items():
        v = (soil_r * (1 - veg) + veg_r * veg) * (0.8 + 0.4 * tex)
        v = v * 255 / 0.6 + rng.normal(0.0, 2.0, (h, w))
        out[band] = np.clip(np.rint(v), 0, 255).astype(np.uint8)
    return out


def main():
    CORPUS.mkdir(parents=True, exist_ok=True)
    MULTI.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20230418)

    images, annotations = [], []
    ann_id = 1
    for i in range(20):
        img, boxes = aerial(i, rng)
        name = f"aerial_{i:02d}.png"
        Image.fromarray(img).save(CORPUS / name)
        image_id = i + 1
        images.append(
            {"id": image_id, "file_name": name, "width": img.shape[1], "height": img.shape[0]}
        )
        for x, y, bw, bh, cat in boxes:
            annotations.append(
                {"id": ann_id, "image_id": image_id, "category_id": cat, "bbox": [x, y, bw, bh]}
            )
            ann_id += 1

    for stem, img in photos().items():
        Image.fromarray(img).save(CORPUS / f"{stem}.png")

    doc = {
        "images": images,
        "categories": [{"id": 1, "name": "vehicle"}, {"id": 2, "name": "person"}],
        "annotations": annotations,
    }
    (CORPUS / "annotations.json").write_text(json.dumps(doc, indent=1) + "\n")

    for band, plane in multispectral(rng).items():
        Image.fromarray(plane).save(MULTI / f"field01_{band}.png")


if __name__ == "__main__":
    main()

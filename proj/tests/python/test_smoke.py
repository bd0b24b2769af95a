import json
import os
from pathlib import Path

import numpy as np
import pytest

import acqbench

DATA = Path(os.environ.get("ACQBENCH_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_config_id_and_text_round_trip():
    cfg = acqbench.PipelineConfig()
    assert acqbench.config_id(cfg) == "q8_lossless_full_rgb_g1_k0"
    cfg.quant_bits = 4
    cfg.jpeg_quality = 90
    cfg.color_model = "gray"
    assert acqbench.config_id(cfg) == "q4_j90_full_gray_g1_k0"
    assert acqbench.PipelineConfig.parse(cfg.to_text()) == cfg


def test_invalid_config_raises_value_error():
    with pytest.raises(ValueError):
        acqbench.PipelineConfig.parse("quant_bits = 3\n")


def test_quantize_through_numpy():
    samples = np.full((1, 2, 2), 100, dtype=np.uint8)
    img = acqbench.Image(samples, "gray")
    cfg = acqbench.PipelineConfig()
    cfg.quant_bits = 2
    cfg.color_model = "gray"
    out = acqbench.apply_config(img, cfg)
    assert out.bit_depth == 2
    assert (out.to_numpy() == 85).all()
    back = acqbench.decode(acqbench.encode(out, cfg))
    assert back == out


def test_qraw_sizes():
    assert acqbench.qraw_payload_size(1024, 1024, 3, 8) == 3145728
    assert acqbench.qraw_payload_size(1024, 1024, 3, 4) == 1572864
    assert acqbench.qraw_payload_size(1024, 1024, 3, 2) == 786432


def test_decode_error():
    with pytest.raises(acqbench.DecodeError):
        acqbench.decode(b"QRAW\x01")


def test_iou_and_delta():
    assert abs(acqbench.iou([0, 0, 2, 2], [1, 1, 2, 2]) - 1 / 7) < 1e-12
    assert acqbench.format_delta(25, 28) == "+12 %"


def test_load_and_evaluate(tmp_path):
    img = acqbench.load_image(DATA / "corpus" / "aerial_00.png")
    assert img.channels == 3
    gt_path = DATA / "corpus" / "annotations.json"
    gt = json.loads(gt_path.read_text())
    det = [dict(a, score=1.0) for a in gt["annotations"]]
    det_path = tmp_path / "det.json"
    det_path.write_text(json.dumps(det))
    result = acqbench.evaluate_files(gt_path, det_path)
    assert result["map50"] == pytest.approx(1.0)

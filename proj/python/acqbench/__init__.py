"""Acquisition-parameter benchmark: image transforms, codecs and mAP scoring."""

from ._acqbench import (
    DataError,
    DecodeError,
    Image,
    PipelineConfig,
    apply_config,
    config_id,
    decode,
    encode,
    evaluate_files,
    format_delta,
    iou,
    load_image,
    qraw_payload_size,
)

__all__ = [
    "DataError",
    "DecodeError",
    "Image",
    "PipelineConfig",
    "apply_config",
    "config_id",
    "decode",
    "encode",
    "evaluate_files",
    "format_delta",
    "iou",
    "load_image",
    "qraw_payload_size",
]

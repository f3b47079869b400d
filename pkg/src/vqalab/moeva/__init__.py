"""Mixture-of-experts quality model: contrastive pre-training and fusion."""

from .augment import AugmentationSpec, apply_augmentation, build_augmentation_bank
from .encoder import TinyEncoder, encoder_backward, encoder_forward, init_params
from .loss import infonce_loss
from .pairing import Chunk, CropPair, generate_pairs, make_chunk, ola_crop
from .pretrain import EncoderPair, PretrainConfig, momentum_update, pretrain
from .features import moeva_features, moeva_predict, video_embedding

__all__ = [
    "AugmentationSpec",
    "apply_augmentation",
    "build_augmentation_bank",
    "Chunk",
    "CropPair",
    "EncoderPair",
    "PretrainConfig",
    "TinyEncoder",
    "encoder_backward",
    "encoder_forward",
    "generate_pairs",
    "infonce_loss",
    "init_params",
    "make_chunk",
    "moeva_features",
    "moeva_predict",
    "momentum_update",
    "ola_crop",
    "pretrain",
    "video_embedding",
]

"""Prompt rendering, chat-sample synthesis and the training manifest."""

from .dataset import ChatMessage, ChatSample, IdMismatch, align_gold, synth_dataset, synth_sample
from .manifest import InvariantViolation, TrainingManifest, build_manifest, emit_training_manifest
from .templates import (
    PLACEHOLDER,
    InsufficientExemplars,
    PlaceholderMissing,
    PromptTemplates,
    TemplateError,
    few_shot_augment,
    load_templates,
    render_text,
    render_user_prompt,
)

__all__ = [
    "ChatMessage",
    "ChatSample",
    "IdMismatch",
    "align_gold",
    "synth_dataset",
    "synth_sample",
    "InvariantViolation",
    "TrainingManifest",
    "build_manifest",
    "emit_training_manifest",
    "PLACEHOLDER",
    "InsufficientExemplars",
    "PlaceholderMissing",
    "PromptTemplates",
    "TemplateError",
    "few_shot_augment",
    "load_templates",
    "render_text",
    "render_user_prompt",
]

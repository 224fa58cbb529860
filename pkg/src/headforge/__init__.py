"""Desk-scale pipeline for concept-driven editing of dynamic volumetric head avatars.

Subpackages:
    diffmath  -- differentiable numerics substrate (params, nets, Adam, grad checks)
    volren    -- rays, stratified sampling, hash-grid encoding, volume compositing
    avatar    -- deformable radiance-field head model and photometric training
    diffusion -- noise schedules, conditional denoiser, CFG sampling, fine-tuning
    keyframes -- keyframe selection and concept-identifier assignment
    editing   -- guided score-distillation editing of the avatar's appearance
    scenegen  -- procedural synthetic multi-view video generator
    cli       -- pipeline orchestration, metrics, ablation runner
"""

__version__ = "0.1.0"

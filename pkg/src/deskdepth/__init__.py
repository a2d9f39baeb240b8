"""Desk-scale self-supervised monocular depth estimation.

Subpackages:
  tensor      n-d arrays with reverse-mode autodiff
  geometry    pinhole cameras, SE(3) poses, differentiable view synthesis
  losses      photometric / reconstruction / distillation losses
  models      tiny depth and camera networks, checkpoints
  synth       synthetic-scene generator with known ground truth
  data        triplet ingestion, augmentations, pseudo-label storage
  evaluation  depth metrics, alignment, crops
  train       training loop, optimizer, schedules
  cli         command-line entry points
"""

__version__ = "0.1.0"

"""Pathway-factorized contrastive pretraining and residual mixture-of-experts
Cox survival modeling, with a synthetic cohort generator whose known latent
factors make the stratification and specialization behavior testable."""

__version__ = "0.1.0"

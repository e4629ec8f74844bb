"""Reversible complex diffusion laboratory."""

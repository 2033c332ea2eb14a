"""Sliding-mode speed control benchmark for a surface-mount PMSM."""

"""Discrete braid Conley index computations and periodic-orbit forcing for twist maps of the disc."""

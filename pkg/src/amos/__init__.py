"""Pick the number of clusters in spectral graph clustering.

The loop in :mod:`amos.engine` grows K until the spectral clusters pass
homogeneity and phase-transition reliability tests (:mod:`amos.stats`).
"""

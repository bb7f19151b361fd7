"""
Anisotropic Multigrid Solver - Source Package
"""

"""Exact desk-scale workbench for nondeterministic hardness of generators."""

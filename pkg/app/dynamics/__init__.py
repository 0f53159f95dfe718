"""Replicator dynamics, heteroclinic network and stability analysis."""

"""Steady states of network dynamics via graphon limits."""

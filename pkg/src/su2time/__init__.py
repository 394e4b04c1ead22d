"""Minimum-time control of a two-level quantum system on SU(2)."""

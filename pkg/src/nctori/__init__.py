"""Exact arithmetic for the SO(n,n|Z) action on noncommutative tori."""

__version__ = "0.1.0"

"""Confidence-rich occupancy grid mapping."""

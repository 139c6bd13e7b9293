"""
Tests for the travelwave module.
"""

"""
Unit tests for the SUVR engine
"""

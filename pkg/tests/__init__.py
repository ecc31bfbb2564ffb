"""
Tests for RAQ-DOA.
"""

"""Tests for the steerdistil.core subpackage."""

"""Test suite for the quasibel Beltrami toolkit."""

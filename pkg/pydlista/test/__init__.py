"""
Unit tests for pydlista.  Run with

    python -m unittest discover pydlista/test

The acceptance checks in test_acceptance are skipped unless PYDLISTA_SLOW=1.

"""

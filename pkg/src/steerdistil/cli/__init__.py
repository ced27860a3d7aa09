"""Command line interface, documents and certification suites.

The console script ``steerdistil`` runs `steerdistil.cli.main.main`.
"""

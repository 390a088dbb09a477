"""Command line client, builtin targets and benchmark suites."""

"""HTTP service wrapping the synthesis library."""

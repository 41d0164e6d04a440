"""HTTP service around the solver; the CLI calls the same functions in-process."""

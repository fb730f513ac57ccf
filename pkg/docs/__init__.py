"""Documentation for scenario-se."""

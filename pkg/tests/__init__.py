"""Testing for scenario-se."""

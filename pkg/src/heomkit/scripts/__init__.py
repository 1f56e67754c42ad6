"""Subcommand implementations driven from the heomkit entry point."""

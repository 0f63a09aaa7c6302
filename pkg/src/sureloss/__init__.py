"""Checking whether finite sets of desirable gambles avoid sure loss."""

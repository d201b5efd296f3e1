"""Bundled default lexicons and rule tables (tab-separated text files)."""

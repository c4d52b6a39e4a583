"""Evolving MaxCut instances that separate depth-1 RQAOA from Goemans-Williamson."""

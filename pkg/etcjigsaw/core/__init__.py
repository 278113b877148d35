# __init__.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Identify core as a sub-package in etcjigsaw."""

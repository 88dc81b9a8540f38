"""Computation services: trees, free groups, claspers, gluing"""

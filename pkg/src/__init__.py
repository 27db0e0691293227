"""Tally - exact analysis of dynamic reporting games and transfer mechanisms"""

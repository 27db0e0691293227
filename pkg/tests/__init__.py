"""Test suite for Tally"""

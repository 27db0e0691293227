"""CLI tools and utilities"""

"""Locally decodable codes with randomized encoding for Hamming and edit errors."""

__version__ = "0.1.0"

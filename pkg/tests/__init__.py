"""Test package for Agentic AI Flight Booking"""

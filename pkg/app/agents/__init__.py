"""Agents module - workflow orchestration"""
from .runner import ACCEPTANCE_CHECKS, GmmsRunner, create_runner

__all__ = ["ACCEPTANCE_CHECKS", "GmmsRunner", "create_runner"]

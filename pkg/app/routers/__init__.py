"""
Routers module
"""
from app.routers import runs

__all__ = ["runs"]

from gcckit.util import loader, mv, ops

__all__ = ["loader", "mv", "ops"]

"""The dsverify test suite, a package for ``from .helpers import``."""

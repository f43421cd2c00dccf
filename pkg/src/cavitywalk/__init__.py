"""Multi-walker quantum walks on phase-space circles, their cavity-QED
open-system counterparts, and checks of the coin pulse schemes."""

__version__ = "0.1.0"

"""Circuit augmentation for linear programs guided by the max central path."""

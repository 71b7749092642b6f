# Group lattice, sufficient statistics and evaluation metrics

# Bound-constrained tuning and fit drivers

# Estimator method registry

# Closed-form reference estimators

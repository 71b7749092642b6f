# Additive intersectional-effects prior structure

# Makes this a package for recipes

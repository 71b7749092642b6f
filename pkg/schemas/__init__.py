# Make schemas a package
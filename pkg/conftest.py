# Puts the repository root on sys.path so that top-level packages import in tests.

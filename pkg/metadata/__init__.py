# Metadata package for enhanced sidecar manifests

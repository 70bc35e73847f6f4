# Utility modules for SPROCKET time series experiments

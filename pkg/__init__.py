"""
SPROCKET time series experiments.

Importable as a package so the app and CLI resolve utils when deployed
to environments like Streamlit Cloud.
"""

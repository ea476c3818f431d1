"""Statistical feature extraction, selection and noise/defect classification for grayscale ROIs."""

__version__ = "0.1.0"

"""
Published per-fold results (SVM vs DL, normal vs severe OSA), as printed.

Each row: accuracy, sensitivity, specificity, F-score in %, plus the number of
positive (Severe) test windows of that fold. Negatives are always 100.
"""

PUBLISHED_FOLDS = {
    "SVM": [
        # fold: (accuracy, sensitivity, specificity, f_score, n_pos)
        (57.00, 59.00, 55.00, 57.84, 100),
        (59.00, 62.00, 56.00, 60.19, 100),
        (58.79, 48.48, 69.00, 53.93, 99),
        (56.78, 57.58, 56.00, 57.00, 99),
        (55.50, 76.00, 35.00, 63.07, 100),
        (55.50, 55.00, 56.00, 55.28, 100),
        (56.28, 60.61, 52.00, 57.97, 99),
        (56.00, 54.00, 58.00, 55.10, 100),
        (49.50, 61.00, 38.00, 54.71, 100),
        (55.00, 67.00, 43.00, 59.82, 100),
    ],
    "DL": [
        (80.50, 83.00, 78.00, 80.98, 100),
        (82.50, 83.00, 82.00, 82.59, 100),
        (80.50, 79.00, 82.00, 80.20, 100),
        (82.00, 77.00, 85.00, 80.21, 100),
        (82.00, 75.00, 79.00, 82.52, 100),
        (76.50, 69.00, 84.00, 74.59, 100),
        (82.50, 88.00, 77.00, 83.41, 100),
        (75.00, 72.00, 78.00, 74.23, 100),
        (73.50, 68.00, 79.00, 71.96, 100),
        (79.50, 82.00, 77.00, 80.00, 100),
    ],
}

PUBLISHED_NEGATIVES = 100

PUBLISHED_MEANS = {
    "SVM": {"accuracy": 55.94, "sensitivity": 60.07, "specificity": 51.80, "f_score": 57.49},
    "DL": {"accuracy": 79.45, "sensitivity": 77.60, "specificity": 80.10, "f_score": 79.07},
}

PUBLISHED_ACCURACY_SD = {"SVM": 2.63, "DL": 3.29}

# Valor de t impresso junto ao teste pareado (coincide com o valor crítico bicaudal, df=10, p=0.05)
PUBLISHED_T_STATISTIC = 2.228

# Empty __init__ files for Python packages

from flask_sqlalchemy import SQLAlchemy

# Census runs and per-family outcomes are persisted for resume and reporting
db = SQLAlchemy()

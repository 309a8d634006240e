import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "netbandit.settings")
django.setup()

from django.apps import AppConfig


class NetbanditConfig(AppConfig):
    name = "netbandit"
    verbose_name = "Network bandit experiments"

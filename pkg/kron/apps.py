from django.apps import AppConfig


class KronConfig(AppConfig):
    name = 'kron'

"""levyarea numerical engine"""
